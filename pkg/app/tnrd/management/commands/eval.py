import typing
from ...forms import EvaluateForm
from ... import tasks
from ._base import TnrdCommand


class Command(TnrdCommand):
    help = 'Report per-image and average PSNR of a model against ground-truth images.'

    def add_arguments(self, parser) -> None:
        parser.add_argument('--model', default='',
                            help='model file, not needed with --restored-dir')
        parser.add_argument('--gt-dir', required=True)
        parser.add_argument('--restored-dir', default='',
                            help='compare these images instead of restoring degraded ones')
        parser.add_argument('--report', required=True)
        parser.add_argument('--per-stage', action='store_true')
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--background', action='store_true')

    def run(self, **options: typing.Any) -> None:
        cd = self.validated(EvaluateForm({
            'model': options['model'], 'gtDir': options['gt_dir'],
            'restoredDir': options['restored_dir'], 'report': options['report'],
            'perStage': options['per_stage'], 'seed': options['seed']}))
        if options['background']:
            asyncResult = tasks.evaluateModelTask.apply_async(args=(cd,))
            self.stdout.write(f'queued evaluation task {asyncResult.task_id}')
            return
        res = tasks.evaluateModelTask(cd)
        average = 'n/a' if res['average'] is None else f'{res["average"]:.4f} dB'
        self.stdout.write(f'{res["images"]} images, average PSNR {average}, report {res["report"]}')
