"""
Allow running the PC-LS toolkit as a module.

Usage:
    python -m pcls validate specs/full_default.json
"""

import sys

from pcls.cli import main

if __name__ == "__main__":
    sys.exit(main())
