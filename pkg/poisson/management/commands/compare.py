from poisson.cli import CommandName, PipelineCommand


class Command(PipelineCommand):
    help = "Run both pipelines and print the mean squared difference."
    command = CommandName.COMPARE
