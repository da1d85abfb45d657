import sys

from bhdirac.cli import main

sys.exit(main())
