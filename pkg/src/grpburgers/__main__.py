import sys

from grpburgers.cli import main

sys.exit(main())
