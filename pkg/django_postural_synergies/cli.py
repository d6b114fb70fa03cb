import sys

import django
from django.conf import settings
from django.core.management import ManagementUtility


def configure():
    """Minimal standalone settings; an existing Django project keeps its own."""
    if settings.configured:
        return
    settings.configure(
        INSTALLED_APPS=["django_postural_synergies"],
        TEMPLATES=[{"BACKEND": "django.template.backends.django.DjangoTemplates", "APP_DIRS": True}],
        LOGGING={
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {"plain": {"format": "%(levelname)s %(name)s: %(message)s"}},
            "handlers": {"console": {"class": "logging.StreamHandler", "formatter": "plain"}},
            "loggers": {"django_postural_synergies": {"handlers": ["console"], "level": "WARNING"}},
        },
    )
    django.setup()


def main(argv=None):
    argv = list(sys.argv if argv is None else argv)
    configure()
    utility = ManagementUtility(argv)
    utility.prog_name = "postural-synergies"
    utility.execute()


if __name__ == "__main__":
    main()
