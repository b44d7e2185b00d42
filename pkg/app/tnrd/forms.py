""" Validation of command options for training, evaluation and the gradient check."""
import pathlib
import re
from django import forms
from django.core.exceptions import ValidationError
import django.db.models as dj_models
from django.utils.translation import gettext_lazy as _
from . import const
from .conf import tnrdSetting
from .data_terms import ProblemKind
from .exceptions import InvalidArgumentError
from .filter_bank import buildDctBasis

SIZE_PATTERN = re.compile(r'^(\d+)x(\d+)$')


def validateOddKernel(value: int) -> None:
    if value % 2 == 0:
        raise ValidationError(_('Kernel size must be odd.'))


def validateDirectory(value: str) -> None:
    if not pathlib.Path(value).is_dir():
        raise ValidationError(_('Directory %(value)s does not exist.'), params={'value': value})


class Problem(dj_models.TextChoices):
    DENOISE = const.PROBLEM_DENOISE, _('Gaussian denoising')
    SISR = const.PROBLEM_SISR, _('Single image super resolution')
    DEBLOCK = const.PROBLEM_DEBLOCK, _('JPEG deblocking')


class RbfKind(dj_models.TextChoices):
    GAUSSIAN = const.RBF_GAUSSIAN, _('Gaussian')
    TRIANGULAR = const.RBF_TRIANGULAR, _('Triangular')


class ProblemFieldsMixin(forms.Form):
    """ Problem kind with its parameter (sigma, factor or quality)."""
    problem = forms.ChoiceField(choices=Problem.choices, required=True, label=_('Problem'))
    param = forms.FloatField(required=False, label=_('Problem parameter'),
                             help_text=_('Noise sigma, scale factor or JPEG quality; '
                                         '25, 2 or 10 when left out.'))

    def clean(self) -> dict:
        cd = super().clean()
        if 'problem' in cd and cd.get('param') is None and not self.errors.get('param'):
            cd['param'] = const.DEFAULT_PARAMS[cd['problem']]
        if 'problem' in cd and cd.get('param') is not None:
            try:
                problem = ProblemKind(cd['problem'], cd['param'])
                problem.validate(tnrdSetting('STRICT_PROBLEM_PARAMS'))
            except InvalidArgumentError as ex:
                self.add_error('param', str(ex))
        return cd

    def problemKind(self) -> ProblemKind:
        return ProblemKind(self.cleaned_data['problem'], self.cleaned_data['param'])

    def cleanedDataAsStr(self) -> str:
        """ Represent form cleaned data as string."""
        cd = self.cleaned_data
        return ', '.join(f'{fieldObj.label}: {cd.get(name)}' for name, fieldObj in self.fields.items())


class ModelShapeMixin(forms.Form):
    kernel = forms.IntegerField(
        min_value=const.KERNEL_MIN_SIZE, max_value=const.KERNEL_MAX_SIZE, initial=3, required=True,
        label=_('Kernel size'), validators=[validateOddKernel])
    filters = forms.IntegerField(
        min_value=1, required=False, label=_('Filters per stage'),
        help_text=_('At most kernel * kernel - 1; defaults to that maximum.'))
    stages = forms.IntegerField(min_value=1, initial=2, required=True, label=_('Stages'))
    rbf = forms.ChoiceField(choices=RbfKind.choices, initial=RbfKind.GAUSSIAN, required=False,
                            label=_('Radial basis kind'))

    def clean(self) -> dict:
        cd = super().clean()
        if self.errors.get('kernel') or 'kernel' not in cd:
            return cd
        maxFilters = buildDctBasis(cd['kernel']).count
        if cd.get('filters') is None:
            cd['filters'] = maxFilters
        elif cd['filters'] > maxFilters:
            self.add_error('filters', _('At most %(max)d filters for this kernel size.')
                           % {'max': maxFilters})
        if not cd.get('rbf'):
            cd['rbf'] = const.RBF_GAUSSIAN
        return cd


class TrainConfigForm(ProblemFieldsMixin, ModelShapeMixin, forms.Form):

    class Scheme(dj_models.TextChoices):
        GREEDY = const.SCHEME_GREEDY, _('Greedy')
        JOINT = const.SCHEME_JOINT, _('Joint')
        GREEDY_JOINT = const.SCHEME_GREEDY_JOINT, _('Greedy, then joint')

    class Init(dj_models.TextChoices):
        PLAIN = const.INIT_PLAIN, _('Plain (DCT atoms, fitted influence function)')
        RANDOM = const.INIT_RANDOM, _('Uniform random')

    class Group(dj_models.TextChoices):
        LAMBDA = const.GROUP_LAMBDA, _('Reaction weight')
        FILTERS = const.GROUP_FILTERS, _('Filters')
        INFLUENCES = const.GROUP_INFLUENCES, _('Influence functions')

    scheme = forms.ChoiceField(choices=Scheme.choices, initial=Scheme.GREEDY_JOINT, required=True,
                               label=_('Training scheme'))
    iters = forms.IntegerField(min_value=1, initial=const.LBFGS_ITERS, required=True,
                               label=_('L-BFGS iterations'))
    memory = forms.IntegerField(min_value=1, initial=const.LBFGS_MEMORY, required=True,
                                label=_('L-BFGS memory'))
    groups = forms.MultipleChoiceField(
        choices=Group.choices, required=True, label=_('Trained parameter groups'),
        help_text=_('Groups left out keep their initial values.'))
    init = forms.ChoiceField(choices=Init.choices, initial=Init.PLAIN, required=False,
                             label=_('Initialization'),
                             help_text=_('Random parameters are seeded by the seed option.'))
    tied = forms.BooleanField(required=False, label=_('Tied stages'),
                              help_text=_('All stages share one parameter set.'))
    lam = forms.FloatField(min_value=1e-12, initial=const.INITIAL_LAMBDA, required=False,
                           label=_('Initial reaction weight'))
    workers = forms.IntegerField(min_value=1, required=False, label=_('Workers'))
    seed = forms.IntegerField(min_value=0, required=False, label=_('Seed'))
    out = forms.CharField(required=True, label=_('Model file'))

    def clean(self) -> dict:
        cd = super().clean()
        if not cd.get('init'):
            cd['init'] = const.INIT_PLAIN
        if cd.get('lam') is None:
            cd['lam'] = const.INITIAL_LAMBDA
        if cd.get('workers') is None:
            cd['workers'] = tnrdSetting('WORKERS')
        if cd.get('seed') is None:
            cd['seed'] = tnrdSetting('DEFAULT_SEED')
        if 'groups' in cd:
            # keep the packing order independent of the option order
            cd['groups'] = [g for g in const.GROUPS if g in cd['groups']]
        return cd


class DatasetManifestForm(forms.Form):
    data = forms.CharField(required=True, label=_('Image directory'), validators=[validateDirectory])
    crop = forms.IntegerField(min_value=1, initial=64, required=True, label=_('Crop size'))
    cropsPerImage = forms.IntegerField(min_value=1, initial=4, required=True,
                                       label=_('Crops per image'))


class EvaluateForm(forms.Form):
    model = forms.CharField(required=False, label=_('Model file'),
                            help_text=_('Not needed when restored images are given.'))
    gtDir = forms.CharField(required=True, label=_('Ground truth directory'),
                            validators=[validateDirectory])
    restoredDir = forms.CharField(required=False, label=_('Restored images directory'),
                                  validators=[validateDirectory])
    report = forms.CharField(required=True, label=_('Report file'))
    perStage = forms.BooleanField(required=False, label=_('Per stage PSNR'))
    seed = forms.IntegerField(min_value=0, required=False, label=_('Seed'))

    def clean(self) -> dict:
        cd = super().clean()
        if cd.get('seed') is None:
            cd['seed'] = tnrdSetting('DEFAULT_SEED')
        if not cd.get('restoredDir') and not cd.get('model') and not self.errors.get('restoredDir'):
            self.add_error('model', _('A model file is needed to restore the images.'))
        if cd.get('restoredDir') and cd.get('perStage'):
            self.add_error('perStage', _('Per stage PSNR needs the model to restore the images.'))
        return cd


class GradcheckForm(ProblemFieldsMixin, ModelShapeMixin, forms.Form):
    size = forms.IntegerField(min_value=4, initial=8, required=True, label=_('Image size'))
    configs = forms.IntegerField(min_value=1, initial=1, required=True,
                                 label=_('Random configurations'))
    samples = forms.IntegerField(min_value=1, initial=1, required=True, label=_('Samples'))
    tol = forms.FloatField(min_value=0.0, initial=const.GRADCHECK_RTOL, required=True,
                           label=_('Relative tolerance'))
    seed = forms.IntegerField(min_value=0, required=False, label=_('Seed'))

    def clean(self) -> dict:
        cd = super().clean()
        if cd.get('seed') is None:
            cd['seed'] = tnrdSetting('DEFAULT_SEED')
        return cd


class SynthesizeForm(forms.Form):
    model = forms.CharField(required=True, label=_('Model file'))
    stage = forms.IntegerField(min_value=1, initial=1, required=True, label=_('Stage'))
    size = forms.RegexField(regex=SIZE_PATTERN, initial='64x64', required=True,
                            label=_('Size'), help_text=_('Format: WIDTHxHEIGHT.'))
    steps = forms.IntegerField(min_value=1, initial=100, required=True, label=_('Steps'))
    seed = forms.IntegerField(min_value=0, required=False, label=_('Seed'))
    out = forms.CharField(required=True, label=_('Output image'))

    def clean(self) -> dict:
        cd = super().clean()
        if cd.get('seed') is None:
            cd['seed'] = tnrdSetting('DEFAULT_SEED')
        if cd.get('size'):
            width, height = (int(v) for v in SIZE_PATTERN.match(cd['size']).groups())
            if width < 1 or height < 1:
                self.add_error('size', _('Width and height must be positive.'))
            cd['shape'] = (height, width)
        return cd
