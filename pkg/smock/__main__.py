import sys

from smock.main import main

sys.exit(main())
