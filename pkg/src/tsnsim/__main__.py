import sys

from tsnsim.cli import main

sys.exit(main())
