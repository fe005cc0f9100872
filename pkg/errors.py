# ==========================
# errors.py
# ==========================
"""
errors.py - exception types shared by the simulator
each one maps to a cli exit code (see main.py)
"""


#MARK: SimulationError
class SimulationError(Exception):
    """base class, anything the simulator raises on purpose"""
    exit_code = 1


class ConfigError(SimulationError):
    """config file missing, unreadable or holding invalid values"""
    exit_code = 3


class InvariantError(SimulationError):
    """a checked invariant failed (budget violation, selftest failure)"""
    exit_code = 4


class InfeasibleSelectionError(SimulationError):
    """a scheme's sensor set cannot upload even one feature within the slot"""
    pass
