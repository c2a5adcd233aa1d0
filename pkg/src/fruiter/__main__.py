import sys

from fruiter.cli import main

sys.exit(main())
