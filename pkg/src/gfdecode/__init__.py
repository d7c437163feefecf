"""Gradient-flow decoding of LDPC codes.

Library layout:

- ldpc       GF(2) code machinery: alist parsing, nullspaces, parity checks
- potential  code potential energy, direct/tensor gradients, Hessian products
- decoder    Euler-integrated gradient flow and the discretized recursion
- channels   AWGN and equivalent-real MIMO channels, MMSE detection
- bp         sum-product BP, tensor-form BP, MMSE + BP pipeline
- score      segmented score model, denoising score-matching training
- unfolding  deep-unfolding trainer for per-iteration decoder schedules
- harness    seeded Monte-Carlo BER experiment driver and CSV emission
- cli        command-line front end (`gfdecode ber|decode|train-score|...`)
"""

from .ldpc import (
    AlistParseError,
    GeneratorBasis,
    ParityCheckMatrix,
    bipolar_to_bits,
    bits_to_bipolar,
    check_parity,
    gf2_nullspace,
    gf2_rank,
    parse_alist,
    random_codeword,
    sign_decision,
    write_alist,
)
from .potential import (
    PotentialParams,
    code_energy,
    grad_direct,
    grad_tensor,
    potential_grad_parts,
    potential_hvp,
    syndrome_products,
)
from .decoder import (
    DecoderSchedule,
    DecodingDivergence,
    EulerConfig,
    Trajectory,
    continuous_solve,
    dgf_decode,
    euler_decode,
    evaluate_objective,
    project_box,
)
from .channels import (
    AwgnChannel,
    MimoChannel,
    awgn_grad,
    awgn_transmit,
    load_channel,
    mimo_grad,
    mmse_detect,
    sample_mimo,
    save_channel,
    snr_convert,
)
from .bp import (
    BpResult,
    EdgeIncidence,
    bmod,
    bp_decode,
    bp_tensor_decode,
    build_uv,
    llr_awgn,
    mmse_bp_pipeline,
)
from .score import (
    LearnedChannel,
    ScoreNet,
    SegmentedChannelSpec,
    TrainConfig,
    correlated2d_sampler,
    dsm_loss,
    learned_grad,
    load_candidates,
    load_scorenet,
    save_scorenet,
    scorenet_forward,
    train_score,
)
from .unfolding import (
    SampleGenerator,
    UnfoldedModel,
    UnfoldTrainConfig,
    model_loss_and_grads,
    schedule_loss_and_grads,
    train_unfolded,
    unfolded_loss,
)
from .harness import (
    BerRecord,
    ConfigError,
    ExperimentConfig,
    batch_decode,
    emit_csv,
    load_config,
    parse_config,
    run_experiment,
    snr_at_ber,
)

__version__ = "0.1.0"
