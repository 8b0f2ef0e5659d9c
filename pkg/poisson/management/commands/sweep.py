from poisson.cli import CommandName, PipelineCommand


class Command(PipelineCommand):
    help = "Benchmark a range of equal qubit counts and write sweep.csv."
    command = CommandName.SWEEP
