"""Default numerical tolerances and limits, collected in one place."""

PERRON_TOL = 1e-12
PERRON_MAX_ITER = 100_000

# h_j iteration: relative sup-norm change per m-step
EIGENFUNCTION_TOL = 1e-13
EIGENFUNCTION_MAX_STEPS = 10_000

CHECK_TOL = 1e-9

# spread of residue-class limits
NONCONVERGENCE_THRESHOLD = 1e-6
INDETERMINATE_THRESHOLD = 1e-8

ENUMERATION_LIMIT = 10**7

# verify subcommand
ORACLE_MAX_N = 12
THEOREM_GAP_N = 200
THEOREM_GAP_TOL = 1e-6
