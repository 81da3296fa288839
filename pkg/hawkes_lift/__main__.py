import sys

from hawkes_lift.main import main

sys.exit(main())
