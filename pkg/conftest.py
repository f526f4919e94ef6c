import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "eventstudy.settings")
django.setup()
