#include "clic/scenario.hpp"

#include <cmath>

#include "clic/container.hpp"
#include "clic/rng.hpp"

namespace clic {

using nlohmann::json;

namespace {

constexpr const char *kDatasetKind = "DSET";

json cplxJson(cplx v)
{
	return json::array({v.real(), v.imag()});
}

cplx cplxFrom(const json &j)
{
	require(j.is_array() && j.size() == 2, "expected complex value as [re, im]");
	return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json paJson(const PaModel &pa)
{
	json branches = json::array();

	for (const auto &b : pa.branches) {
		json taps = json::array();

		for (const auto &v : b) {
			taps.push_back(cplxJson(v));
		}

		branches.push_back(taps);
	}

	return branches;
}

PaModel paFrom(const json &j)
{
	PaModel pa;
	pa.branches.clear();

	for (const auto &b : j) {
		std::vector<cplx> taps;

		for (const auto &v : b) {
			taps.push_back(cplxFrom(v));
		}

		pa.branches.push_back(std::move(taps));
	}

	pa.validate();
	return pa;
}

json iqJson(const IqImbalance &iq)
{
	return {{"gain", iq.gain}, {"phase_rad", iq.phase_rad}};
}

IqImbalance iqFrom(const json &j)
{
	IqImbalance iq;
	iq.gain = j.at("gain").get<double>();
	iq.phase_rad = j.at("phase_rad").get<double>();
	return iq;
}

// -inf is not representable in JSON; a null power disables the noise source.
json dbmJson(double v)
{
	return std::isfinite(v) ? json(v) : json(nullptr);
}

double dbmFrom(const json &j)
{
	return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

template <typename T>
void readIf(const json &j, const char *key, T &out)
{
	if (j.contains(key)) {
		out = j.at(key).get<T>();
	}
}

MultiSequence sliceStreams(const MultiSequence &x, std::size_t first, std::size_t end)
{
	MultiSequence out;
	out.reserve(x.size());

	for (const auto &s : x) {
		out.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(first), s.begin() + static_cast<std::ptrdiff_t>(end));
	}

	return out;
}

MultiSequence dropLeading(const MultiSequence &x, std::size_t n)
{
	return sliceStreams(x, n, streamLength(x));
}

} // namespace

std::size_t ScenarioConfig::paMemory() const
{
	std::size_t m = static_cast<std::size_t>(pa.memory());

	for (const auto &p : per_antenna) {
		m = std::max(m, static_cast<std::size_t>(p.pa.memory()));
	}

	return m;
}

std::vector<RfChainParams> ScenarioConfig::rfParams() const
{
	std::vector<RfChainParams> params = per_antenna;

	if (params.empty()) {
		params.push_back({iq, pa});
	}

	const double ref = std::sqrt(dbmToWatts(tx_power_dbm) * std::pow(10.0, pa_input_backoff_db / 10.0));

	for (auto &p : params) {
		p.pa.input_reference = ref;
	}

	return params;
}

void ScenarioConfig::validate() const
{
	require(n_rx >= 1 && n_tx >= 1, "scenario: antenna counts must be >= 1");
	require(channel_taps >= 1, "scenario: channel_taps must be >= 1");
	pa.validate();
	require(per_antenna.empty() || per_antenna.size() == n_tx, "scenario: per_antenna needs one entry per tx antenna");

	for (const auto &p : per_antenna) {
		p.pa.validate();
	}

	require(std::isfinite(pa_input_backoff_db), "scenario: pa_input_backoff_db must be finite");
	require(std::isfinite(tx_power_dbm) && std::isfinite(rx_cli_power_dbm), "scenario: powers must be finite");
	require(adc_bits >= 1 && adc_bits <= 52, "scenario: adc_bits out of range");
	require(adc_headroom >= 1.0, "scenario: adc_headroom must be >= 1");
	require(train_fraction > 0.0 && train_fraction < 1.0, "scenario: train_fraction must be in (0, 1)");
	require(n_samples > depth(), "scenario: n_samples must exceed the regressor depth");
	ofdm.validate();
	(void)pathloss.amplitudeScale();

	if (fixed_channel) {
		require(fixed_channel->numRx() == n_rx && fixed_channel->numTx() == n_tx &&
				fixed_channel->numTaps() == channel_taps,
			"scenario: fixed_channel dimensions do not match n_rx/n_tx/channel_taps");
	}
}

json toJson(const ScenarioConfig &cfg)
{
	json per = json::array();

	for (const auto &p : cfg.per_antenna) {
		per.push_back({{"iq", iqJson(p.iq)}, {"pa", paJson(p.pa)}});
	}

	json j = {
		{"n_rx", cfg.n_rx},
		{"n_tx", cfg.n_tx},
		{"channel_taps", cfg.channel_taps},
		{"pathloss", {{"distance_m", cfg.pathloss.distance_m}, {"exponent", cfg.pathloss.exponent}}},
		{"iq", iqJson(cfg.iq)},
		{"pa", paJson(cfg.pa)},
		{"per_antenna", per},
		{"pa_input_backoff_db", cfg.pa_input_backoff_db},
		{"tx_power_dbm", cfg.tx_power_dbm},
		{"rx_cli_power_dbm", cfg.rx_cli_power_dbm},
		{"noise_power_dbm", dbmJson(cfg.noise.power_dbm)},
		{"noise_enabled", cfg.noise_enabled},
		{"adc_enabled", cfg.adc_enabled},
		{"adc_bits", cfg.adc_bits},
		{"adc_headroom", cfg.adc_headroom},
		{"calibrate", cfg.calibrate},
		{"ofdm",
		 {{"fft_size", cfg.ofdm.fft_size},
		  {"occupied_subcarriers", cfg.ofdm.occupied_subcarriers},
		  {"cp_len", cfg.ofdm.cp_len},
		  {"qam_order", cfg.ofdm.qam_order},
		  {"sample_rate_hz", cfg.ofdm.sample_rate_hz},
		  {"bandwidth_hz", cfg.ofdm.bandwidth_hz}}},
		{"n_samples", cfg.n_samples},
		{"train_fraction", cfg.train_fraction},
		{"seed", cfg.seed},
	};

	if (cfg.fixed_channel) {
		json taps = json::array();

		for (const auto &h : cfg.fixed_channel->taps()) {
			taps.push_back(cplxJson(h));
		}

		j["fixed_channel"] = taps;
	}

	return j;
}

ScenarioConfig scenarioFromJson(const json &j)
{
	static const std::vector<std::string> known = {
		"n_rx", "n_tx", "channel_taps", "pathloss", "iq", "pa", "per_antenna", "pa_input_backoff_db",
		"tx_power_dbm", "rx_cli_power_dbm", "noise_power_dbm", "noise_enabled", "adc_enabled", "adc_bits",
		"adc_headroom", "calibrate", "ofdm", "n_samples", "train_fraction", "seed", "fixed_channel"};

	require(j.is_object(), "scenario: expected a JSON object");

	for (const auto &[key, value] : j.items()) {
		require(std::find(known.begin(), known.end(), key) != known.end(), "scenario." + key + ": unknown field");
	}

	ScenarioConfig cfg;

	auto field = [&](const char *key, auto &out) {
		try {
			readIf(j, key, out);
		} catch (const json::exception &e) {
			throw InvalidArgument(std::string("scenario.") + key + ": " + e.what());
		}
	};

	auto section = [&](const char *key, auto &&fn) {
		if (!j.contains(key)) {
			return;
		}

		try {
			fn(j.at(key));
		} catch (const json::exception &e) {
			throw InvalidArgument(std::string("scenario.") + key + ": " + e.what());
		} catch (const InvalidArgument &e) {
			throw InvalidArgument(std::string("scenario.") + key + ": " + e.what());
		}
	};

	field("n_rx", cfg.n_rx);
	field("n_tx", cfg.n_tx);
	field("channel_taps", cfg.channel_taps);
	section("pathloss", [&](const json &v) {
		readIf(v, "distance_m", cfg.pathloss.distance_m);
		readIf(v, "exponent", cfg.pathloss.exponent);
	});
	section("iq", [&](const json &v) { cfg.iq = iqFrom(v); });
	section("pa", [&](const json &v) { cfg.pa = paFrom(v); });
	section("per_antenna", [&](const json &v) {
		cfg.per_antenna.clear();

		for (const auto &p : v) {
			cfg.per_antenna.push_back({iqFrom(p.at("iq")), paFrom(p.at("pa"))});
		}
	});
	field("pa_input_backoff_db", cfg.pa_input_backoff_db);
	field("tx_power_dbm", cfg.tx_power_dbm);
	field("rx_cli_power_dbm", cfg.rx_cli_power_dbm);
	section("noise_power_dbm", [&](const json &v) { cfg.noise.power_dbm = dbmFrom(v); });
	field("noise_enabled", cfg.noise_enabled);
	field("adc_enabled", cfg.adc_enabled);
	field("adc_bits", cfg.adc_bits);
	field("adc_headroom", cfg.adc_headroom);
	field("calibrate", cfg.calibrate);
	section("ofdm", [&](const json &v) {
		readIf(v, "fft_size", cfg.ofdm.fft_size);
		readIf(v, "occupied_subcarriers", cfg.ofdm.occupied_subcarriers);
		readIf(v, "cp_len", cfg.ofdm.cp_len);
		readIf(v, "qam_order", cfg.ofdm.qam_order);
		readIf(v, "sample_rate_hz", cfg.ofdm.sample_rate_hz);
		readIf(v, "bandwidth_hz", cfg.ofdm.bandwidth_hz);
	});
	field("n_samples", cfg.n_samples);
	field("train_fraction", cfg.train_fraction);
	field("seed", cfg.seed);
	section("fixed_channel", [&](const json &v) {
		MultipathChannel ch(cfg.n_rx, cfg.n_tx, cfg.channel_taps);
		require(v.size() == ch.taps().size(), "expected n_rx * n_tx * channel_taps taps");
		std::size_t k = 0;

		for (std::size_t r = 0; r < cfg.n_rx; ++r) {
			for (std::size_t t = 0; t < cfg.n_tx; ++t) {
				for (std::size_t l = 0; l < cfg.channel_taps; ++l) {
					ch.tap(r, t, l) = cplxFrom(v.at(k++));
				}
			}
		}

		cfg.fixed_channel = ch;
	});

	cfg.validate();
	return cfg;
}

double maxAbs(const MultiSequence &x, std::size_t end)
{
	double m = 0.0;

	for (const auto &s : x) {
		for (std::size_t n = 0; n < end && n < s.size(); ++n) {
			m = std::max(m, std::abs(s[n]));
		}
	}

	return m;
}

void computeNormalization(CliDataset &ds)
{
	ds.m1 = maxAbs(ds.d, ds.split_index);
	ds.m2 = maxAbs(ds.s, ds.split_index);
	require(ds.m1 > 0.0 && ds.m2 > 0.0, "dataset: training partition is all zeros");
}

CliDataset generateDataset(const ScenarioConfig &cfg, GenerationTrace *trace)
{
	cfg.validate();

	const std::size_t transient = cfg.depth() - 1;
	const std::size_t total = cfg.n_samples + transient;

	const MultiSequence d = genOfdm(cfg.ofdm, cfg.n_tx, total, cfg.tx_power_dbm,
					deriveSeed(cfg.seed, SeedPurpose::Waveform));
	const MultiSequence x = transmitChain(d, cfg.rfParams());

	MultipathChannel ch = cfg.fixed_channel
				      ? *cfg.fixed_channel
				      : drawChannel(deriveSeed(cfg.seed, SeedPurpose::Channel), cfg.n_rx, cfg.n_tx,
						    cfg.channel_taps, cfg.pathloss);
	const std::size_t split =
		static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(cfg.n_samples)));
	MultiSequence s = propagate(x, ch);
	double scale = 1.0;

	// the target power holds over the evaluation window, which is where cancellers are scored
	if (cfg.calibrate) {
		const double measured = measurePowerDbm(sliceStreams(s, transient + split, total));
		require(std::isfinite(measured), "scenario: channel output has zero energy, cannot calibrate");
		scale = std::pow(10.0, (cfg.rx_cli_power_dbm - measured) / 20.0);
		ch = ch.scaled(scale);
		s = propagate(x, ch);
	}

	const double clean_power = measurePowerDbm(sliceStreams(s, transient + split, total));

	if (cfg.noise_enabled) {
		s = addAwgn(s, cfg.noise, deriveSeed(cfg.seed, SeedPurpose::Noise));
	}

	std::optional<AdcConfig> adc;

	if (cfg.adc_enabled) {
		adc = AdcConfig{cfg.adc_bits, cfg.adc_headroom * peakRail(s)};
		require(adc->full_scale > 0.0, "scenario: received signal is all zeros, cannot set ADC full scale");
		s = quantizeAdc(s, *adc);
	}

	CliDataset ds;
	ds.d = dropLeading(d, transient);
	ds.s = dropLeading(s, transient);
	ds.split_index = split;
	computeNormalization(ds);
	ds.meta = json{{"generator", "clic"}, {"seed", cfg.seed}, {"scenario", toJson(cfg)}}.dump();

	if (trace) {
		trace->channel = ch;
		trace->channel_scale = scale;
		trace->adc = adc;
		trace->clean_rx_power_dbm = clean_power;
	}

	return ds;
}

Eigen::MatrixXd buildRegressors(const MultiSequence &d, std::size_t depth)
{
	require(depth >= 1, "buildRegressors: depth must be >= 1");
	require(!d.empty(), "buildRegressors: no transmit streams");
	requireAligned(d, "buildRegressors");

	const std::size_t n = streamLength(d);
	require(depth <= n, "buildRegressors: depth exceeds stream length");

	const std::size_t rows = n - depth + 1;
	const std::size_t cols = 2 * d.size() * depth;
	Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));

	for (std::size_t r = 0; r < rows; ++r) {
		const std::size_t t = r + depth - 1;
		Eigen::Index c = 0;

		for (const auto &stream : d) {
			for (std::size_t m = 0; m < depth; ++m) {
				const cplx v = stream[t - m];
				x(static_cast<Eigen::Index>(r), c++) = v.real();
				x(static_cast<Eigen::Index>(r), c++) = v.imag();
			}
		}
	}

	return x;
}

Eigen::MatrixXd labelRows(const MultiSequence &s, std::size_t first)
{
	requireAligned(s, "labelRows");
	const std::size_t n = streamLength(s);
	require(first <= n, "labelRows: first index beyond stream");

	Eigen::MatrixXd y(static_cast<Eigen::Index>(n - first), static_cast<Eigen::Index>(2 * s.size()));

	for (std::size_t t = first; t < n; ++t) {
		for (std::size_t a = 0; a < s.size(); ++a) {
			y(static_cast<Eigen::Index>(t - first), static_cast<Eigen::Index>(2 * a)) = s[a][t].real();
			y(static_cast<Eigen::Index>(t - first), static_cast<Eigen::Index>(2 * a + 1)) = s[a][t].imag();
		}
	}

	return y;
}

MultiSequence labelStreams(const Eigen::MatrixXd &rows)
{
	require(rows.cols() % 2 == 0, "labelStreams: odd column count");
	MultiSequence out(static_cast<std::size_t>(rows.cols() / 2), ComplexSequence(static_cast<std::size_t>(rows.rows())));

	for (Eigen::Index t = 0; t < rows.rows(); ++t) {
		for (std::size_t a = 0; a < out.size(); ++a) {
			out[a][static_cast<std::size_t>(t)] = {rows(t, static_cast<Eigen::Index>(2 * a)),
							       rows(t, static_cast<Eigen::Index>(2 * a + 1))};
		}
	}

	return out;
}

double normalize(double x, double m)
{
	require(m > 0.0, "normalize: scale must be positive");
	return x / m;
}

double denormalize(double y, double m)
{
	require(m > 0.0, "denormalize: scale must be positive");
	return m * y;
}

cplx normalize(cplx x, double m)
{
	require(m > 0.0, "normalize: scale must be positive");
	return x / m;
}

cplx denormalize(cplx y, double m)
{
	require(m > 0.0, "denormalize: scale must be positive");
	return m * y;
}

MultiSequence normalize(const MultiSequence &x, double m)
{
	require(m > 0.0, "normalize: scale must be positive");
	MultiSequence out = x;

	for (auto &s : out) {
		for (auto &v : s) {
			v /= m;
		}
	}

	return out;
}

MultiSequence denormalize(const MultiSequence &y, double m)
{
	require(m > 0.0, "denormalize: scale must be positive");
	MultiSequence out = y;

	for (auto &s : out) {
		for (auto &v : s) {
			v *= m;
		}
	}

	return out;
}

void saveDataset(const CliDataset &ds, const std::filesystem::path &path)
{
	container::Document doc;
	doc.kind = kDatasetKind;
	doc.metadata = json{{"n_tx", ds.numTx()},
			    {"n_rx", ds.numRx()},
			    {"n_samples", ds.size()},
			    {"split_index", ds.split_index},
			    {"meta", ds.meta}}
			       .dump();
	doc.arrays["d"] = container::interleave(ds.d);
	doc.arrays["s"] = container::interleave(ds.s);
	doc.arrays["norm"] = {ds.m1, ds.m2};
	container::writeFileAtomic(path, container::encode(doc));
}

CliDataset loadDataset(const std::filesystem::path &path)
{
	using container::FormatError;

	const auto doc = container::decode(container::readFile(path), kDatasetKind);
	CliDataset ds;

	try {
		const auto meta = json::parse(doc.metadata);
		const auto n_tx = meta.at("n_tx").get<std::size_t>();
		const auto n_rx = meta.at("n_rx").get<std::size_t>();
		ds.split_index = meta.at("split_index").get<std::size_t>();
		ds.meta = meta.at("meta").get<std::string>();
		ds.d = container::deinterleave(container::array(doc, "d"), n_tx);
		ds.s = container::deinterleave(container::array(doc, "s"), n_rx);

		if (ds.size() != meta.at("n_samples").get<std::size_t>() || streamLength(ds.s) != ds.size()) {
			throw FormatError(FormatError::Kind::Schema, "dataset: stream lengths do not match header");
		}
	} catch (const json::exception &e) {
		throw FormatError(FormatError::Kind::Schema, std::string("dataset: bad metadata: ") + e.what());
	}

	const auto &norm = container::array(doc, "norm");

	if (norm.size() != 2) {
		throw FormatError(FormatError::Kind::Schema, "dataset: normalization block must hold m1, m2");
	}

	ds.m1 = norm[0];
	ds.m2 = norm[1];
	return ds;
}

} // namespace clic
