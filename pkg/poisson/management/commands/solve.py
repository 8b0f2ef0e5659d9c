from poisson.cli import CommandName, PipelineCommand


class Command(PipelineCommand):
    help = "Solve the Poisson problem with the simulated quantum pipeline."
    command = CommandName.SOLVE
