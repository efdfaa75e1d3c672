import sys

from lewisim.main import main

sys.exit(main())
