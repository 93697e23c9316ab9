"""Allow running as: python -m rmsieve"""

import sys

from rmsieve.cli import main

sys.exit(main())
