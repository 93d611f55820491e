import sys

from cpg.cli import main

sys.exit(main())
