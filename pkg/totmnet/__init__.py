"""ToTMNet: FFT-accelerated Toeplitz temporal mixing for pulse-waveform recovery"""

import os

from .config import settings

# BLAS reads these once, when NumPy is first imported.
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, str(settings.num_threads))

__version__ = "1.0.0"
