import typing
from ...forms import DatasetManifestForm, TrainConfigForm
from ... import const, tasks
from ._base import TnrdCommand


class Command(TnrdCommand):
    help = 'Train a reaction-diffusion model on crops of an image directory.'

    def add_arguments(self, parser) -> None:
        parser.add_argument('--problem', required=True, choices=const.PROBLEMS)
        parser.add_argument('--param', required=True, type=float,
                            help='noise sigma, scale factor or JPEG quality')
        parser.add_argument('--stages', type=int, default=2)
        parser.add_argument('--kernel', type=int, default=3)
        parser.add_argument('--filters', type=int, default=None)
        parser.add_argument('--rbf', default=const.RBF_GAUSSIAN, choices=const.RBF_KINDS)
        parser.add_argument('--data', required=True, help='directory of clean images')
        parser.add_argument('--crop', type=int, default=64)
        parser.add_argument('--crops-per-image', type=int, default=4)
        parser.add_argument('--scheme', default=const.SCHEME_GREEDY_JOINT, choices=const.SCHEMES)
        parser.add_argument('--iters', type=int, default=const.LBFGS_ITERS)
        parser.add_argument('--memory', type=int, default=const.LBFGS_MEMORY)
        parser.add_argument('--groups', default=','.join(const.GROUPS),
                            help='comma separated subset of ' + ','.join(const.GROUPS))
        parser.add_argument('--tied', action='store_true')
        parser.add_argument('--init', default=const.INIT_PLAIN,
                            help='plain or random; random parameters are drawn with --seed')
        parser.add_argument('--lambda', dest='lam', type=float, default=const.INITIAL_LAMBDA)
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--workers', type=int, default=None)
        parser.add_argument('--report-gradients', action='store_true')
        parser.add_argument('--background', action='store_true',
                            help='queue the job for a celery worker')
        parser.add_argument('--out', required=True)

    def run(self, **options: typing.Any) -> None:
        data = dict(options)
        data['groups'] = [g.strip() for g in options['groups'].split(',') if g.strip()]
        data['cropsPerImage'] = options['crops_per_image']
        cd = self.validated(TrainConfigForm(data), DatasetManifestForm(data))
        cd['reportGradients'] = options['report_gradients']
        if options['background']:
            asyncResult = tasks.trainModelTask.apply_async(args=(cd,))
            self.stdout.write(f'queued training task {asyncResult.task_id}')
            return
        res = tasks.trainModelTask(cd)
        self.stdout.write(
            f'{res["name"]}: {res["parameters"]} parameters, {res["samples"]} samples, '
            f'loss {res["initialLoss"]:.6e} -> {res["finalLoss"]:.6e}, saved to {res["model"]}')
