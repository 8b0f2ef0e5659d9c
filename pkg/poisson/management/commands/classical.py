from poisson.cli import CommandName, PipelineCommand


class Command(PipelineCommand):
    help = "Solve with the classical quadrature baseline."
    command = CommandName.CLASSICAL
