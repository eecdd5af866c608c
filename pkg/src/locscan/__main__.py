import sys

from locscan.cli import main

sys.exit(main())
