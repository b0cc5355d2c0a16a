"""Named parameter sets, in configuration units (degrees, knots where suffixed).

``navis-49m`` carries the ship particulars (roll period 11 s at zero speed);
``navis-49m-model`` carries the roll model used on the testbench
(omega0 = 0.698 rad/s, nu = 0.073, k_02 = 0.1078). Both use the same hull,
actuator and fins.
"""

import math

VESSELS = {
    "navis-49m": {
        "omega0": 2.0 * math.pi / 11.0,
        "nu_theta": 0.073,
        "m": 700.0e3,
        "h_theta": 0.522,
        "quadratic_share": 0.25,
        "reference_rate": 0.03,
        "V": 0.0,
    },
    "navis-49m-model": {
        "omega0": 0.698,
        "nu_theta": 0.073,
        "m": 700.0e3,
        "h_theta": 0.522,
        "quadratic_share": 0.25,
        "reference_rate": 0.03,
        "V": 0.0,
    },
}

# two 3 m^2 fins acting in anti-phase
FINS = {
    "navis-49m": {"k_02": 0.1078, "S_f": 6.0, "l_f": 4.0, "C_delta": 3.0, "rho": 1025.0},
}

ACTUATORS = {
    "navis-49m": {
        "T_delta": 0.14,
        "omega_f_max_deg": 35.0,
        "delta_f_max_deg": 60.0,
        "tau": 0.05,
        "deadband_deg": 0.25,
    },
}

GAINS = {
    "reference": {"k_p": 2.3, "k_d": 15.1, "c": 0.14, "T_delta": 0.14},
}

SEA_STATES = {
    "sea-state-5": {
        "Hs": 2.2,
        "Tz": 5.4,
        "spectrum_kind": "pierson-moskowitz",
        "encounter_angle": 90.0,
        "seed": 0,
        "attenuation_depth": 3.0,
    },
}

MANEUVERS = {"table-3": None}  # built by ident.calibration_maneuver

_BASE = {
    "vessel": "navis-49m-model",
    "fins": "navis-49m",
    "actuator": "navis-49m",
    "n_harmonics": 10,
    "dt": 0.01,
}

SCENARIOS = {
    "sea-state-5": {**_BASE, "name": "sea-state-5", "controller": "reference",
                    "sea_state": "sea-state-5", "fidelity": "testbench", "duration": 600.0},
    "sea-state-5-off": {**_BASE, "name": "sea-state-5-off", "controller": "off",
                        "sea_state": "sea-state-5", "fidelity": "testbench", "duration": 600.0},
    "reference-stability": {**_BASE, "name": "reference-stability", "controller": "reference",
                        "fidelity": "design", "duration": 100.0},
    "identification": {**_BASE, "name": "identification", "controller": "off",
                       "command": {"kind": "maneuver", "stages": "table-3"},
                       "fidelity": "testbench", "duration": 290.0},
    "moment-comparison": {**_BASE, "name": "moment-comparison", "controller": "off",
                          "command": {"kind": "harmonic", "amplitude_deg": 20.0, "period": 5.0},
                          "fidelity": "testbench", "duration": 30.0},
}


def catalog() -> dict:
    return {"vessels": VESSELS, "fins": FINS, "actuators": ACTUATORS, "gains": GAINS,
            "sea_states": SEA_STATES, "maneuvers": sorted(MANEUVERS), "scenarios": SCENARIOS}
