import sys

from gradenet.cli import main

sys.exit(main())
