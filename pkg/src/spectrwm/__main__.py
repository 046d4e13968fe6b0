import sys

from spectrwm.cli import main

sys.exit(main())
