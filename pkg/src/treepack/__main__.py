import sys

from treepack.cli import main

sys.exit(main())
