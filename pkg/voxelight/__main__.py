import sys

from voxelight.cli import main

sys.exit(main())
