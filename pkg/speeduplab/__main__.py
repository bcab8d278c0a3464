import sys

from speeduplab.cli import main

sys.exit(main())
