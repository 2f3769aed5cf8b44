""" Module defining constants """

# string constants for acquisition stage names
SIGSYNTH = 'sigsynth'
FRONTEND = 'frontend'
TDREADOUT = 'tdreadout'

# config sections that are not pipeline stages
CROSSBAR = 'crossbar'
RECON = 'recon'
METRICS = 'metrics'

# in-band measurement flags
SATURATION = 'saturation'
OPEN_CIRCUIT = 'open_circuit'
SHORT_CIRCUIT = 'short_circuit'
INCONSISTENT_COUNTS = 'inconsistent_counts'
GAIN_FLOOR = 'gain_floor'
NUMERICAL_SINGULARITY = 'numerical_singularity'
NOT_CONVERGED = 'not_converged'
JACOBIAN_FALLBACK = 'jacobian_fallback'
INFINITE_SNR = 'infinite_snr'

# flags that invalidate a measurement; gain_floor only marks reduced accuracy
FAILURE_FLAGS = frozenset([SATURATION, OPEN_CIRCUIT, SHORT_CIRCUIT, INCONSISTENT_COUNTS, NUMERICAL_SINGULARITY])
