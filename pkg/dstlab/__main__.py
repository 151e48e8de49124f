import sys

from dstlab.main import main

sys.exit(main())
