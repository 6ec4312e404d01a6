import sys

from ercbench.bench.cli import main

sys.exit(main())
