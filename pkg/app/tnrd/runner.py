""" Test runner leaving out the long desk-scale training runs unless they are asked for."""
from django.test.runner import DiscoverRunner

ACCEPTANCE_TAG = 'acceptance'


class TnrdTestRunner(DiscoverRunner):
    """ 'manage.py test' skips tests tagged 'acceptance'; 'manage.py test --tag acceptance' runs them."""

    def __init__(self, *args, tags=None, exclude_tags=None, **kwargs) -> None:
        exclude = set(exclude_tags or ())
        if not tags or ACCEPTANCE_TAG not in tags:
            exclude.add(ACCEPTANCE_TAG)
        super().__init__(*args, tags=tags, exclude_tags=exclude, **kwargs)
