from .app import app
from .jobs import (ConfigError, execute_case, execute_compat, execute_run,
                   execute_sweep, execute_unique, run_selftest)
from .schemas import (CaseOverridesModel, CaseRequest, RunConfigModel,
                      RunRequest, SelftestResponse)
