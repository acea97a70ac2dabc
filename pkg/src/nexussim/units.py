"""Unit conversion helpers.

Internally everything is SI: Pa, kg/s, m, W, s.  Bar, MW and mcm/d appear
only at I/O boundaries.  Volume conversions always go through an explicit
standard density (kg per standard m3); nothing here hard-codes one.
"""

BAR = 1.0e5              # Pa per bar
MW = 1.0e6               # W per MW
SECONDS_PER_HOUR = 3600.0
SECONDS_PER_DAY = 86400.0
MCM = 1.0e6              # standard m3 per mcm


def bar_to_pa(p_bar: float) -> float:
    return p_bar * BAR


def pa_to_bar(p_pa: float) -> float:
    return p_pa / BAR


def mcm_per_day_to_kg_s(volume_mcm_d: float, standard_density: float) -> float:
    """Convert a daily volume (mcm/d at standard conditions) to a mass rate."""
    return volume_mcm_d * MCM * standard_density / SECONDS_PER_DAY


def kg_to_mcm(mass_kg: float, standard_density: float) -> float:
    """Convert a gas mass to standard-condition volume in mcm."""
    return mass_kg / standard_density / MCM


def kg_to_m3(mass_kg: float, standard_density: float) -> float:
    return mass_kg / standard_density
