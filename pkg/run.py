"""Simple script to run the ToTMNet command line"""

import sys

from totmnet.main import main

if __name__ == "__main__":
    sys.exit(main())
