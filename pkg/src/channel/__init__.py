from .fading import ChannelPair, draw_channel_pair, path_loss_db, path_loss_linear, rician_matrix, steering_vector
from .noise import BOLTZMANN, noise_variance, thermal_noise_power

__all__ = [
    "BOLTZMANN",
    "ChannelPair",
    "draw_channel_pair",
    "noise_variance",
    "path_loss_db",
    "path_loss_linear",
    "rician_matrix",
    "steering_vector",
    "thermal_noise_power",
]
