import sys

from .fraccli import main

sys.exit(main())
