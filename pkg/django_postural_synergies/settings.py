from django.conf import settings
from django.core.signals import setting_changed
from django.utils.module_loading import import_string

from django_postural_synergies.encoders import BaseEncoder

SETTINGS_NAMESPACE = "POSTURAL_SYNERGIES"
DEFAULTS = {
    "JSON_ENCODER": BaseEncoder,
    # acquisition
    "EMG_RATE": 2000.0,
    "PLATE_RATE": 1000.0,
    "MARKER_RATE": 100.0,
    "TRIALS_PER_SESSION": 50,
    "SESSIONS_PER_SUBJECT": 2,
    "ONSET_WINDOW": 0.8,
    "TRIAL_WINDOW": 3.0,
    "TRIAL_WINDOW_TOLERANCE": 0.01,
    "PRE_ONSET_COVERAGE": 0.2,
    # EMG filter chain
    "BAND_LOW": 20.0,
    "BAND_HIGH": 300.0,
    "ENVELOPE_CUTOFF": 50.0,
    "FILTER_ORDER": 4,
    # binning
    "BIN_WIDTH": 0.075,
    "VPR_THRESHOLD": 0.05,
    "INCLUDE_BK": True,
    "NORMALIZE_PER_SESSION": False,
    # factorization
    "VAF_CRITERION": 90.0,
    "MAX_SYNERGIES": 10,
    "NMF_RESTARTS": 20,
    "NMF_MAX_ITER": 5000,
    "NMF_TOL": 1e-8,
    "NMF_EPSILON": 1e-12,
    "NMF_WORKERS": 1,
    "POOLING": "pooled",
    "PER_SYNERGY_VAF": "rank1",
    "INVOLVEMENT_THRESHOLD": 0.5,
    "SEED": 0,
    # center of pressure
    "LOAD_THRESHOLD": 20.0,
    "COP_REFERENCE": "mean",
    "PLATE_ORIGINS": ((-100.0, 0.0), (100.0, 0.0)),
    # robot and protocol simulation
    "FORCE_FIELD_GAIN": 300.0,
    "FORCE_FIELD_SATURATION": 100.0,
    "PERTURBATION_DURATION": 0.15,
    "CALIBRATION_START": 0.40,
    "CALIBRATION_STEP": 0.01,
    "CALIBRATION_MAX": 1.0,
    "SIM_DT": 0.001,
    # statistics
    "MWU_EXACT_LIMIT": 16,
    "ALTERNATIVE": "two-sided",
}


def import_from_string(value, name):
    try:
        return import_string(value)
    except ImportError:
        raise ImportError(f"Could not import '{name}' setting")


def import_setting(value, name):
    if value is None:
        return None
    elif name == "JSON_ENCODER" and isinstance(value, str):
        return import_from_string(value, name)
    return value


class SynergySettings:
    def __getattr__(self, attr):
        if attr not in DEFAULTS:
            raise AttributeError(f"Invalid setting: '{attr}'")
        try:
            value = self.user_settings[attr]
        except KeyError:
            value = DEFAULTS[attr]
        return import_setting(value, attr)

    @property
    def user_settings(self):
        if not hasattr(self, "_user_settings"):
            if settings.configured:
                self._user_settings = getattr(settings, SETTINGS_NAMESPACE, {})
            else:
                return {}
        return self._user_settings

    def reload_user_settings(self):
        if hasattr(self, "_user_settings"):
            delattr(self, "_user_settings")


synergy_settings = SynergySettings()


def reload_settings(*args, **kwargs):
    setting = kwargs["setting"]
    if setting == SETTINGS_NAMESPACE:
        synergy_settings.reload_user_settings()


setting_changed.connect(reload_settings)
