import sys

from gaussbound.cli import main

sys.exit(main())
