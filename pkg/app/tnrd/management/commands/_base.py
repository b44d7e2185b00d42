""" Common behaviour of the tnrd management commands."""
import typing
from django import forms
from django.core.management.base import BaseCommand, CommandError
from ...exceptions import (ImageFormatError, InvalidArgumentError, ModelFormatError,
                           NumericalRankError, OptimizationError)

ENGINE_ERRORS = (InvalidArgumentError, ImageFormatError, ModelFormatError, NumericalRankError,
                 OptimizationError, OSError)


class TnrdCommand(BaseCommand):
    """ Runs 'run' and reports engine errors as CommandError (non-zero exit status)."""

    def run(self, **options: typing.Any) -> None:
        raise NotImplementedError

    def handle(self, *args: typing.Any, **options: typing.Any) -> None:
        try:
            self.run(**options)
        except ENGINE_ERRORS as ex:
            raise CommandError(f'{type(ex).__name__}: {ex}') from ex

    @staticmethod
    def validated(*forms_: forms.Form) -> dict:
        """ Merged cleaned data of valid forms.
        Raises:
            CommandError: form errors, one per line
        """
        cd = {}
        for form in forms_:
            if not form.is_valid():
                errors = '; '.join(f'{field}: {" ".join(msgs)}'
                                   for field, msgs in form.errors.items())
                raise CommandError(f'invalid options: {errors}')
            cd.update(form.cleaned_data)
        return cd
