from .gradcheck import grad_check
from .layers import (
    CausalConv1d,
    Dense,
    GatedActivation,
    GlobalAvgPool,
    Layer,
    Param,
    ReLU,
    conv1d_causal_bwd,
    conv1d_causal_fwd,
    dense_bwd,
    dense_fwd,
    gated_activation,
    gated_activation_bwd,
    global_avg_pool,
    global_avg_pool_bwd,
    mse_loss,
    param_count,
    sigmoid,
)
from .optim import Adam, AdamState, adam_step
from .recurrent import (
    Bidirectional,
    GruCell,
    LstmCell,
    Recurrent,
    RnnCell,
    lstm_step,
    make_cell,
    run_recurrent,
)

__all__ = [
    "Adam", "AdamState", "Bidirectional", "CausalConv1d", "Dense", "GatedActivation",
    "GlobalAvgPool", "GruCell", "Layer", "LstmCell", "Param", "ReLU", "Recurrent", "RnnCell",
    "adam_step", "conv1d_causal_bwd", "conv1d_causal_fwd", "dense_bwd", "dense_fwd",
    "gated_activation", "gated_activation_bwd", "global_avg_pool", "global_avg_pool_bwd",
    "grad_check", "lstm_step", "make_cell", "mse_loss", "param_count", "run_recurrent", "sigmoid",
]
