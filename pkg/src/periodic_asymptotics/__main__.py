"""Allow ``python -m periodic_asymptotics``."""

import sys

from periodic_asymptotics.cli import main

sys.exit(main())
