import sys

from pydanticquasimap.cli.main import main

sys.exit(main())
