import subprocess
import sys
from pathlib import Path

from gradal.modelio import read_model

FIXTURES = Path(__file__).parent / "fixtures"

# fixtures that validate without a fail verdict and have a single grading
SINGLE_GRADED = ["t2m", "t3m", "generic_deg2", "generic_deg3", "wedge2te", "automorphism", "vector_bundle", "base",
                 "explicit_base"]
POSITIVE_DEGREE = ["t2m", "t3m", "generic_deg2", "generic_deg3", "wedge2te", "automorphism", "vector_bundle"]


def load(name: str):
    if not name.endswith(".gradal"):
        name += ".gradal"
    return read_model(FIXTURES / name)


def gradal(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "gradal", *map(str, args)], capture_output=True, text=True, cwd=cwd)
