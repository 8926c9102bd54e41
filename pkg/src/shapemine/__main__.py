import sys

from shapemine.cli import main

sys.exit(main())
