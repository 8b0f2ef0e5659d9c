from poisson.cli import CommandName, PipelineCommand


class Command(PipelineCommand):
    help = "List the source catalog."
    command = CommandName.LIST_SOURCES
