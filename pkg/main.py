# main.py

import sys

from src.ui.cli import main

if __name__ == "__main__":
    sys.exit(main())
