import sys

from optoblockade.cli.main import main

sys.exit(main())
