import sys

from solitongeom.cli import main

sys.exit(main())
