"""
Surrogate P-EXIT thresholds of a basematrix, one report per surrogate kind.
"""
from apps.common.exceptions import ConfigurationError
from apps.pexit.threshold import threshold_report
from apps.pipeline.base import ProtoshapeCommand, resolve_design, threshold_options, write_json
from apps.pipeline.schemas import ThresholdConfigSchema
from apps.surrogates.matching import SurrogateKind


class Command(ProtoshapeCommand):
    help = 'Compute decoding thresholds over BEC and/or biAWGN surrogates'
    schema = ThresholdConfigSchema

    def run(self, config, out, seed, threads):
        design = resolve_design(config)
        if design.mode is None or design.snr_bracket is None:
            raise ConfigurationError("mode and snr_bracket are required", 'mode')
        options = threshold_options(config)

        reports = {}
        for name in config['surrogates']:
            report = threshold_report(design.base, design.m, design.mode, SurrogateKind(name),
                                      design.snr_bracket, **options)
            reports[name] = report.to_dict()
            self.stdout.write(f"{name}: threshold {report.threshold_db:.4f} dB, "
                              f"capacity gap {report.capacity_gap_db:.4f} dB")

        payload = {
            'preset': design.preset,
            'basematrix': design.base.to_dict(),
            'snr_bracket': list(design.snr_bracket),
            'options': options,
            'reports': reports,
        }
        self.output(write_json(out / 'threshold.json', payload))
        self.manifest.summary = {name: r['threshold_db'] for name, r in reports.items()}
