from .audit import RunContext as RunContext
from .audit import RunJournal as RunJournal
from .store import read_measurement as read_measurement
from .store import write_csv as write_csv
from .store import write_json as write_json
