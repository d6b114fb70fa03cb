SECRET_KEY = "postural-synergies-tests"

INSTALLED_APPS = [
    "django_postural_synergies",
]

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "APP_DIRS": True,
    },
]

USE_TZ = True
