# modules live flat at the repo root and import each other by bare name
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
