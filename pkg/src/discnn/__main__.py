"""Starts the discnn command line"""

from __future__ import annotations

from discnn.cli.main import main

if __name__ == "__main__":
    main()
