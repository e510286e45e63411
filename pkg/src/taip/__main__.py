import sys

from taip.cli import main

sys.exit(main())
