"""Max-min NOMA with quantized channel feedback: allocation, quantizers, Monte Carlo."""

from .channel import CHUNK, ChannelParams, ChannelState, StreamSeed, sample_block, sample_channel
from .alloc import (
    PowerAllocation,
    SolverResult,
    alloc_from_rate,
    max_min_rate_two_user,
    optimal_alpha_two_user,
    rate_k,
    sic_rates,
    solve_max_min_k,
    tdma_min_rate,
    varpi,
)
from .quantizer import (
    OUTAGE,
    RATE,
    FeedbackWord,
    QuantizerConfig,
    default_t_outage,
    default_t_rate,
    fle_bits,
    quantize_outage,
    quantize_rate,
    vle_decode,
    vle_encode,
    vle_length,
    vle_rate_bound,
)
from .evaluator import (
    OutageConfig,
    TrialOutcome,
    achievable_check,
    actual_min_rate,
    adapted_rates,
    alpha_from_quantized,
    outage_indicator,
    outage_loss,
    rate_loss_bound,
    run_trial,
    snr_decomposition,
)
from .harness import (
    ExperimentConfig,
    MetricPoint,
    RunStats,
    estimate_diversity,
    run_experiment,
)

__version__ = "0.1.0"
