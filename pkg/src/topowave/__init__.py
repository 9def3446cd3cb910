"""Topological image losses with wavelet texture masks.

Persistence diagrams of intensity-filtered complexes on the pixel grid,
total-persistence losses with exact subgradients, a two-level Haar
texture mask, PSNR/SSIM metrics and a timing benchmark, plus a CLI
binding them together.
"""

from .bench import BenchRow, bench_to_csv, emit_plot_script, run_bench
from .complexes import (
    ComplexKind,
    FilteredComplex,
    Simplex,
    build_complex,
    build_cubical,
    build_vr_grid,
    sublevel_subcomplex,
)
from .errors import (
    DimensionMismatchError,
    ImageTooSmallError,
    MalformedImageError,
    OutOfBoundsError,
    TopowaveError,
    UnsupportedBitDepthError,
)
from .imagecore import (
    ImageGrid,
    PixelIndex,
    add_gaussian_noise,
    extract_patch,
    load_image,
    save_image,
)
from .loss import (
    LossConfig,
    LossReport,
    base_loss_field,
    prepare_reference,
    topo_loss,
    total_persistence,
    tpers_gradient,
    wvcomb_from_reference,
    wvcomb_loss,
)
from .metrics import MetricReport, metric_report, psnr, ssim
from .persistence import (
    PersistenceDiagram,
    PersistencePair,
    diagram_from_json,
    diagram_to_json,
    merge_diagrams,
    persistence_h0,
    persistence_h1,
)
from .wavelet import (
    TextureMask,
    WaveletBands,
    dwt_haar_forward,
    dwt_haar_inverse,
    pad_to_even,
    texture_mask,
)

__version__ = "0.1.0"
