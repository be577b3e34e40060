import sys
from pathlib import Path

# make sibling test modules importable (the acceptance suite reuses the
# quadrature oracle defined in test_kernels)
sys.path.insert(0, str(Path(__file__).parent))
