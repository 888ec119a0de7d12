class Constants:

    # PHYSICS
    C0 = 299792458.0

    # OFDM GRID
    # cyclic prefix default is 1/(CP_FACTOR * delta_f), roughly 7 % overhead
    CP_FACTOR = 14

    # reference scenario
    REFERENCE = {
        "f0": 28e9,
        "delta_f": 120e3,
        "N": 512,
        "L": 256,
        "N_t": 16,
        "N_r": 16,
        "modulation": "qam64",
        "N_tr": 256,
    }
    REFERENCE_OBJECTS = {
        # (azimuth [deg], range [m], velocity [m/s])
        "toi": (-10.0, 41.8, -31.2),
        "uav1": (-15.0, 53.2, 61.0),
        "uav2": (30.0, 55.4, -31.2),
        "emitter": (-74.5, 122.4, 0.0),
    }

    # DESK SCALE (STAP presets)
    DESK = {
        "N": 64,
        "L": 32,
        "N_t": 8,
        "N_r": 8,
    }

    # CLUTTER RINGS
    CLUTTER_COUNT = 100
    CLUTTER_RINGS = 4
    CLUTTER_AZIMUTH_DEG = (-90.0, 90.0)
    CLUTTER_VELOCITY = (-1.0, 1.0)

    # RECEIVER CHAIN
    CFAR_GUARD = 2
    CFAR_TRAIN = 8
    RF_ZERO_GUARD = 1e-9
    GATE_GUARD = 2
    GATE_TRAIN = 16

    # NUMERICS
    LOADING = 1e-6
    PSD_FLOOR = 1e-10
    HERMITIAN_TOL = 1e-12
    NULL_SPACE_TOL = 1e-12
    RANK_FLOOR = 1e-9

    # SLOW-TIME FILTERS
    KALMAN_AC = 0.999
    RMA_RHO = 0.5

    # ANGLE-DOPPLER GRID
    ANGLE_STEP_DEG = 1.0

    # OPTIMISATION
    SOLVER = "CLARABEL"
    FALLBACK_SOLVER = "SCS"
    FEAS_MARGIN = 1e-5
    DINKELBACH_TOL = 1e-4
    MAX_OUTER = 30
    CCP_TOL = 1e-6
    CCP_MAX_ITER = 20
    SLP_STARTS = 3
    DECREASE_GUARD = 1e-8
