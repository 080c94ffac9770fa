import sys

from dftbeam.cli import main

sys.exit(main())
