import pathlib
import typing
from django.core.management.base import CommandError
from ...conf import tnrdSetting
from ...image_io import filterGrid, penaltyTable, saveImage
from ...model_file import loadModel
from ._base import TnrdCommand


class Command(TnrdCommand):
    help = 'Export the filters of a model as an image grid and its penalties as CSV.'

    def add_arguments(self, parser) -> None:
        parser.add_argument('--model', required=True)
        parser.add_argument('--stage', type=int, default=None,
                            help='export a single stage (1-based); all stages by default')
        parser.add_argument('--filters', default='', help='filter grid image')
        parser.add_argument('--penalties', default='', help='CSV of sampled phi and rho')

    def run(self, **options: typing.Any) -> None:
        if not options['filters'] and not options['penalties']:
            raise CommandError('nothing to export: give --filters and/or --penalties')
        model = loadModel(options['model'])
        stages = model.stages
        if options['stage'] is not None:
            if not 1 <= options['stage'] <= model.numStages:
                raise CommandError(f'model has {model.numStages} stages, got stage {options["stage"]}')
            stages = [stages[options['stage'] - 1]]
        if options['filters']:
            kernels = [k for s in stages for k in s.kernels(model.basis)]
            saveImage(filterGrid(kernels), options['filters'], tnrdSetting('PNG_SUPPORT'))
            self.stdout.write(f'{len(kernels)} filters saved to {options["filters"]}')
        if options['penalties']:
            pathlib.Path(options['penalties']).write_text(penaltyTable(stages, model.rbf),
                                                          encoding='utf-8')
            self.stdout.write(f'penalties saved to {options["penalties"]}')
