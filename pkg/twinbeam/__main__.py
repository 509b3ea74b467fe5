import sys

from twinbeam.cli import main

sys.exit(main())
