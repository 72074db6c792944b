"""Time-domain multi-scale shape identification for 2D electro-sensing.

Pipeline: boundary meshes -> layer-potential operators -> filtered
polarization tensors (frequency sweep or time stepping) -> limited-view
least-squares reconstruction -> transform-invariant multi-scale
descriptors -> dictionary matching.
"""

from .acquisition import (AcquisitionConfig, ForwardOperator, background_field,
                          build_array, build_forward_operator)
from .descriptors import (Dictionary, ShapeDescriptor, build_dictionary,
                          compute_descriptor, load_dictionary, match,
                          save_dictionary)
from .forward import (DensityHistory, MSRDataset, add_noise, load_msr,
                      simulate_msr, solve_density)
from .geometry import (BoundaryMesh, Material, RigidMotion, SHAPE_NAMES,
                       apply_motion, make_shape)
from .gpt import (GPTFreq, PTComputer, PTSeries, filtered_pt_series,
                  filtered_pt_spectral_oracle, gpt_freq)
from .inversion import ReconstructionResult, reconstruct_pt
from .potentials import (BoundaryOperator, SpectralData, assemble_neumann_poincare,
                         assemble_single_layer, eval_single_layer,
                         spectral_decomposition)
from .pulse import Pulse, base_pulse, dilate, pulse_bank

__version__ = "0.1.0"
