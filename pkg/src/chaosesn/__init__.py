"""Echo state networks that learn chaotic attractors: emulation of the
Mackey-Glass and Lorenz systems, bidirectional chaos synchronisation, and a
plain-text reservoir attack on a delay-system chaos cipher."""

from .analysis import (Spectrum, first_locked_window, instantaneous_frequency,
                       power_spectrum, windowed_nmse)
from .crypto import (BobResult, CipherParams, TrainedAttacker, alice_encrypt,
                     bandpass_filter, bob_decrypt, channel, eve_decrypt,
                     eve_train)
from .dynamics import (DelayHistory, GridHistory, IntegrationError,
                       LorenzParams, MGParams, MixDrive, TimeSeries,
                       integrate_lorenz, integrate_mg, read_csv, resample,
                       write_csv)
from .emulation import (CouplingSchedule, GenerationResult, TrainedEmulator,
                        autonomous_run, coupled_run, post_lock_nmse,
                        train_emulator)
from .inverse_sync import lobe_agreement, lorenz_driven_by_rc, mg_driven_by_rc
from .reservoir import (NMSE_UNDEFINED, ReadoutFit, ReservoirConfig,
                        StateHarvest, WeightSet, build_reservoir, harvest,
                        load_weights, nmse, nmse_is_undefined, readout,
                        save_weights, spectral_radius, step, train_readout)
from .signals import (BitMessageParams, FMMessageParams, bit_message,
                      decode_bits, fm_message)

__version__ = "0.1.0"
