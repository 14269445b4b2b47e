"""Allow ``python -m qvar`` as an alias for the ``qvar`` script."""

import sys

from .cli import main

sys.exit(main())
