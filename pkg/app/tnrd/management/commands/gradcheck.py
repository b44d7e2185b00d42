import typing
from django.core.management.base import CommandError
from ...forms import GradcheckForm
from ...gradcheck import gradientCheck
from ._base import TnrdCommand


class Command(TnrdCommand):
    help = 'Compare analytic training gradients with finite differences on random toy models.'

    def add_arguments(self, parser) -> None:
        parser.add_argument('--problem', required=True)
        parser.add_argument('--param', type=float, default=None,
                            help='noise sigma, scale factor or JPEG quality (default 25, 2, 10)')
        parser.add_argument('--size', type=int, default=8)
        parser.add_argument('--kernel', type=int, default=3)
        parser.add_argument('--filters', type=int, default=2)
        parser.add_argument('--stages', type=int, default=1)
        parser.add_argument('--rbf', default='')
        parser.add_argument('--configs', type=int, default=1)
        parser.add_argument('--samples', type=int, default=1)
        parser.add_argument('--tol', type=float, default=1e-5)
        parser.add_argument('--seed', type=int, default=None)

    def run(self, **options: typing.Any) -> None:
        form = GradcheckForm(options)
        cd = self.validated(form)
        problem = form.problemKind()
        failed = 0
        for i in range(cd['configs']):
            res = gradientCheck(problem, seed=cd['seed'] + i, size=cd['size'], m=cd['kernel'],
                                numFilters=cd['filters'], numStages=cd['stages'],
                                numSamples=cd['samples'], rbfKind=cd['rbf'], rtol=cd['tol'])
            status = 'ok' if res.passed else f'FAILED at coordinates {res.failures}'
            self.stdout.write(f'seed {res.seed}: {res.checked} checked, {res.skipped} skipped, '
                              f'max rel error {res.maxRelError:.3e}: {status}')
            failed += not res.passed
        if failed:
            raise CommandError(f'{failed} of {cd["configs"]} configurations failed')
