import sys

from krylopy.cli import main

sys.exit(main())
