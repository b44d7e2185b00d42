import typing
from django.core.management.base import CommandError
from ...conf import tnrdSetting
from ...diffusion import synthesizePattern
from ...forms import SynthesizeForm
from ...image_core import lagOneAutocorrelation
from ...image_io import saveImage
from ...model_file import loadModel
from ._base import TnrdCommand


class Command(TnrdCommand):
    help = 'Synthesize a pattern from uniform noise with the diffusion of one model stage.'

    def add_arguments(self, parser) -> None:
        parser.add_argument('--model', required=True)
        parser.add_argument('--stage', type=int, default=1)
        parser.add_argument('--size', default='64x64', help='WIDTHxHEIGHT')
        parser.add_argument('--steps', type=int, default=100)
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--out', required=True)

    def run(self, **options: typing.Any) -> None:
        cd = self.validated(SynthesizeForm(options))
        model = loadModel(cd['model'])
        if cd['stage'] > model.numStages:
            raise CommandError(f'model has {model.numStages} stages, got stage {cd["stage"]}')
        pattern = synthesizePattern(model.stages[cd['stage'] - 1], model.basis, model.rbf,
                                    cd['shape'], cd['steps'], cd['seed'])
        saveImage(pattern, cd['out'], tnrdSetting('PNG_SUPPORT'))
        self.stdout.write(f'pattern {cd["size"]} after {cd["steps"]} steps saved to {cd["out"]}, '
                          f'lag-1 autocorrelation {lagOneAutocorrelation(pattern):.4f}')
