from poisson.cli import CommandName, PipelineCommand


class Command(PipelineCommand):
    help = "Time every phase of both pipelines."
    command = CommandName.BENCH
