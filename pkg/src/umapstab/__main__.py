import sys

from umapstab.cli import main

sys.exit(main())
