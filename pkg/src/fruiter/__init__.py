"""Automated evaluation of UI test-reuse techniques.

Extract event sequences from test scripts, map them across apps with
pluggable GUI mappers, and score every transfer for fidelity (how correct the
event mapping is) and utility (how much manual work the transferred test
saves).
"""

__version__ = "0.1.0"
