from pathlib import Path
import os
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent
load_dotenv(BASE_DIR / ".env")

SECRET_KEY = os.getenv("SECRET_KEY", "dev-only-insecure-secret-key")
DEBUG = os.getenv("DEBUG", "False").lower() == "true"
ALLOWED_HOSTS = []

INSTALLED_APPS = [
    # Local apps
    "linalg",
    "orderings",
    "solvers",
    "analysis",
    "problems",
    "harness",
]

# no persistence: every experiment writes plain files
DATABASES = {}

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True

# Numerical defaults
SHUFFLED_SOR = {
    "HERMITIAN_TOLERANCE": float(os.getenv("HERMITIAN_TOLERANCE", "1e-8")),
    "RANK_TOLERANCE": float(os.getenv("RANK_TOLERANCE", "1e-10")),
    "EIGEN_TOLERANCE": float(os.getenv("EIGEN_TOLERANCE", "1e-12")),
    "EIGEN_MAX_SWEEPS": int(os.getenv("EIGEN_MAX_SWEEPS", "100")),
    "UNIT_DIAGONAL_TOLERANCE": float(os.getenv("UNIT_DIAGONAL_TOLERANCE", "1e-10")),
    "TARGET_ERROR_SQ": float(os.getenv("TARGET_ERROR_SQ", "1e-24")),
    "CONSISTENCY_TOLERANCE": float(os.getenv("CONSISTENCY_TOLERANCE", "1e-8")),
    "BOUND_C1": float(os.getenv("BOUND_C1", "32.42")),
    "BOUND_C2": float(os.getenv("BOUND_C2", "2907")),
    "EXHAUSTIVE_MAX_N": int(os.getenv("EXHAUSTIVE_MAX_N", "8")),
    "DEFAULT_SEED": int(os.getenv("DEFAULT_SEED", "0")),
    "PLOT_FLOOR": float(os.getenv("PLOT_FLOOR", "1e-30")),
}

# Logging
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": os.getenv("LOG_LEVEL", "WARNING"),
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": os.getenv("SHUFFLED_SOR_LOG_LEVEL", "INFO"),
            "propagate": False,
        }
        for app in ("linalg", "orderings", "solvers", "analysis", "problems", "harness")
    },
}
