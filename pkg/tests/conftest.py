import sys
from pathlib import Path

# Make sibling helper modules (helpers.py, synth.py) importable regardless
# of how pytest was invoked.
sys.path.insert(0, str(Path(__file__).parent))
