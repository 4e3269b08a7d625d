#include "phishkit/corpus/generator.hpp"

#include <array>
#include <cstdio>

#include "phishkit/error.hpp"
#include "phishkit/numerics/rng.hpp"

namespace phishkit::corpus {

using numerics::Rng;

namespace {

// --- slot pools -------------------------------------------------------------

const std::vector<std::string> kNames = {
    "alice", "bob",   "carol", "david", "erin",  "frank", "grace", "henry",
    "iris",  "jack",  "karen", "liam",  "mona",  "noah",  "olivia", "peter",
    "quinn", "rachel", "sam",  "tina",  "victor", "wendy", "yara",  "zach"};

const std::vector<std::string> kCompanies = {
    "acme",    "globex",  "initech", "hooli",   "vertex", "stark",
    "wayne",   "aperture", "oscorp", "tyrell",  "monarch", "nimbus"};

const std::vector<std::string> kServices = {
    "payroll", "webmail", "storage", "vpn", "calendar", "billing", "helpdesk"};

const std::vector<std::string> kProjects = {
    "falcon", "aurora", "kestrel", "beacon", "horizon", "quartz", "mosaic",
    "ember"};

const std::vector<std::string> kItems = {
    "report", "invoice", "agenda", "roadmap", "budget", "slides", "contract",
    "summary"};

const std::vector<std::string> kDays = {"monday", "tuesday", "wednesday",
                                        "thursday", "friday"};

const std::vector<std::string> kScamWords = {
    "securelogin", "wintoday", "freemoney", "prizezone", "megabonus",
    "fastcash", "luckydraw"};

const std::vector<std::string> kTlds = {"xyz", "biz", "club", "top"};

// --- sentence pools ---------------------------------------------------------

// Plain office sentences, shared topic space for every cell.
const std::vector<std::string> kLegitBody = {
    "the {item} for project {project} is attached for review",
    "we moved the {day} sync to the main room",
    "finance processed the {item} from {company} this week",
    "let me know if the numbers in the {item} look right",
    "the {service} upgrade finished without issues last night",
    "minutes from the {day} meeting are in the shared folder",
    "thanks for sending the {item} ahead of schedule",
    "the team agreed to revisit the {project} timeline next quarter",
    "catering is confirmed for the offsite on {day}",
    "please add your notes to the {item} before the review",
    "the printer on the third floor is back in service",
    "welcome {name2} who joins the {project} team on {day}",
};

// Benign sentences that reuse phishing cue words in harmless contexts.
const std::vector<std::string> kLegitHardNegative = {
    "please verify the figures in the {item} when you get a chance",
    "reminder that the {service} password rotation happens next quarter and needs no action",
    "the security review for {project} wrapped up and the summary is attached",
    "ignore the urgent flag on that ticket since it was mislabeled",
    "the {company} account team will visit our office on {day}",
    "the audit confirmed the {item} numbers so no follow up is needed",
};

// Smoothed paraphrases of the same office content for the llm register.
const std::vector<std::string> kLegitBodyLlm = {
    "i hope this message finds you well",
    "as discussed earlier the {item} for project {project} has been shared with the team",
    "kindly note that the {day} sync has been moved to the main room",
    "we appreciate your timely input on the {item}",
    "the {service} maintenance window completed as scheduled",
    "please find the updated {project} timeline attached for your records",
    "finance has completed processing of the {item} received from {company}",
    "we would like to thank you for your continued support on {project}",
    "a brief summary of the {day} meeting has been circulated for reference",
    "your feedback on the {item} would be most welcome before the review",
};

const std::vector<std::string> kLegitHardNegativeLlm = {
    "kindly verify the figures in the {item} at your convenience as part of the routine review",
    "please note the scheduled {service} password rotation requires no action on your side",
    "the periodic security review of {project} has concluded with no findings",
    "the {company} account representatives will be visiting on {day}",
};

// Crude human-written phishing. The typo'd forms (accountt, verifyy, ...)
// extend the clean cue stems so subword tokenizers can still recognize them
// while word-level vocabularies built on other registers cannot.
const std::vector<std::string> kPhishHumanCue = {
    "congratulations {name} you are todays lucky winnerr of a {amount} cash prize",
    "claim your free bonus now at http://{scam}.{tld} before midnight",
    "urgentt your {service} accountt has been suspendedd due to unusuall login",
    "click here http://{scam2}.{tld} to verifyy your accountt immediately or lose access",
    "send your passwordd and card number today to unlock the {amount} reward",
    "act fast this lottery offer expires in minutes winners only today",
    "you have won the {company} mega draw reply with your bank details now",
    "warning your mailbox exceeded the limit click http://{scam}-mail.{tld} now",
    "final notice pay the {amount} fee at http://{scam2}.{tld} to release your prize",
    "your computer has a virus call our hotline and confirmm your card details",
};

// Polished llm-written phishing: office vocabulary with subtle pressure.
const std::vector<std::string> kPhishLlmCue = {
    "we noticed unusual sign in activity on your {service} account",
    "please verify your account details at your earliest convenience to avoid a temporary interruption",
    "as part of a routine security check we kindly ask you to confirm your billing information",
    "your password will expire shortly so kindly validate your credentials through the secure portal",
    "we were unable to process your recent {item} so please confirm your payment method",
    "failure to confirm may result in your account being suspended until verification is complete",
    "please access the verification portal through the link provided in this message",
    "your {service} account requires prompt confirmation to remain active",
};

const std::vector<std::string> kPhishLlmFiller = {
    "this is an automated notice from the {company} support team regarding your account",
    "we appreciate your prompt attention to this matter",
    "thank you for your continued trust in our services",
    "should you have already completed this step please disregard this message",
};

const std::vector<std::string> kGreetings = {"hi {name}", "hello {name}",
                                             "dear {name}"};
const std::vector<std::string> kClosers = {"thanks {name2}", "best {name2}",
                                           "regards {name2}"};

const std::vector<std::string> kSubjectLegit = {
    "meeting notes {day}", "{item} for {project}", "{service} update",
    "weekly {item}", "{project} status"};
const std::vector<std::string> kSubjectLegitLlm = {
    "update regarding {project}", "summary of the {day} meeting",
    "{item} shared for review", "note on the {service} maintenance"};
const std::vector<std::string> kSubjectPhishHuman = {
    "you won a prize", "urgentt accountt notice", "claim your reward now",
    "final warning", "free bonus inside"};
const std::vector<std::string> kSubjectPhishLlm = {
    "action required on your {service} account", "account verification notice",
    "important security update", "billing confirmation needed"};

// --- template engine --------------------------------------------------------

struct SlotContext {
    Rng& rng;
    std::size_t pool_cap;

    const std::string& pick(const std::vector<std::string>& pool) const {
        const std::size_t n = std::min(pool.size(), std::max<std::size_t>(2, pool_cap));
        return pool[rng.below(n)];
    }

    std::string amount() const {
        static const std::vector<std::string> amounts = {"500", "1000", "2500",
                                                         "9000", "750"};
        return amounts[rng.below(amounts.size())];
    }

    std::string fill(const std::string& tmpl) const {
        std::string out;
        out.reserve(tmpl.size() + 16);
        for (std::size_t i = 0; i < tmpl.size();) {
            if (tmpl[i] == '{') {
                const std::size_t end = tmpl.find('}', i);
                const std::string key = tmpl.substr(i + 1, end - i - 1);
                if (key == "name" || key == "name2") out += pick(kNames);
                else if (key == "company") out += pick(kCompanies);
                else if (key == "service") out += pick(kServices);
                else if (key == "project") out += pick(kProjects);
                else if (key == "item") out += pick(kItems);
                else if (key == "day") out += pick(kDays);
                else if (key == "scam" || key == "scam2") out += pick(kScamWords);
                else if (key == "tld") out += pick(kTlds);
                else if (key == "amount") out += amount();
                else out += key;
                i = end + 1;
            } else {
                out += tmpl[i++];
            }
        }
        return out;
    }
};

std::string join_sentences(const std::vector<std::string>& sents,
                           bool exclaim_heavy, Rng& rng) {
    std::string body;
    for (const auto& s : sents) {
        body += s;
        if (exclaim_heavy) {
            const std::size_t bangs = 1 + rng.below(3);
            body.append(bangs, '!');
            body += " ";
        } else {
            body += ". ";
        }
    }
    if (!body.empty()) body.pop_back();
    return body;
}

// Draws k distinct sentences from a pool, filled.
std::vector<std::string> draw(const SlotContext& sc,
                              const std::vector<std::string>& pool,
                              std::size_t k) {
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    sc.rng.shuffle(idx);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, idx.size()); ++i)
        out.push_back(sc.fill(pool[idx[i]]));
    return out;
}

EmailRecord make_record(Label label, Source source, std::size_t index,
                        const SlotContext& sc) {
    Rng& rng = sc.rng;
    EmailRecord rec;
    rec.label = label;
    rec.source = source;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "%c-%s-%05zu",
                  source == Source::Human ? 'h' : 'l',
                  label == Label::Phishing ? "phi" : "leg", index);
    rec.id = idbuf;
    rec.meta["generator"] = "template-v1";

    std::vector<std::string> sents;
    bool exclaim = false;
    if (label == Label::Legitimate) {
        const auto& body_pool =
            source == Source::Human ? kLegitBody : kLegitBodyLlm;
        const auto& hard_pool = source == Source::Human ? kLegitHardNegative
                                                        : kLegitHardNegativeLlm;
        rec.subject = sc.fill(source == Source::Human
                                  ? kSubjectLegit[rng.below(kSubjectLegit.size())]
                                  : kSubjectLegitLlm[rng.below(kSubjectLegitLlm.size())]);
        if (rng.uniform() < 0.7) sents.push_back(sc.fill(kGreetings[rng.below(3)]));
        auto fillers = draw(sc, body_pool, 2 + rng.below(3));
        sents.insert(sents.end(), fillers.begin(), fillers.end());
        // a third of legitimate mail carries a benign cue sentence
        if (rng.uniform() < 0.34) {
            const std::size_t pos = 1 + rng.below(sents.size());
            sents.insert(sents.begin() + pos,
                         sc.fill(hard_pool[rng.below(hard_pool.size())]));
        }
        if (rng.uniform() < 0.6) sents.push_back(sc.fill(kClosers[rng.below(3)]));
    } else if (source == Source::Human) {
        exclaim = true;
        rec.subject = sc.fill(
            kSubjectPhishHuman[rng.below(kSubjectPhishHuman.size())]);
        auto cues = draw(sc, kPhishHumanCue, 2 + rng.below(2));
        sents.insert(sents.end(), cues.begin(), cues.end());
        // crude spam occasionally pads with a mundane line
        if (rng.uniform() < 0.25) {
            auto filler = draw(sc, kLegitBody, 1);
            const std::size_t pos = rng.below(sents.size() + 1);
            sents.insert(sents.begin() + pos, filler[0]);
        }
    } else {
        rec.subject =
            sc.fill(kSubjectPhishLlm[rng.below(kSubjectPhishLlm.size())]);
        if (rng.uniform() < 0.8) sents.push_back(sc.fill(kGreetings[rng.below(3)]));
        auto fillers = draw(sc, kLegitBodyLlm, 1 + rng.below(2));
        auto cues = draw(sc, kPhishLlmCue, 1 + rng.below(2));
        auto extra = draw(sc, kPhishLlmFiller, rng.below(2));
        sents.insert(sents.end(), fillers.begin(), fillers.end());
        for (const auto& cue : cues) {
            const std::size_t pos = 1 + rng.below(sents.size());
            sents.insert(sents.begin() + pos, cue);
        }
        sents.insert(sents.end(), extra.begin(), extra.end());
        if (rng.uniform() < 0.5) sents.push_back(sc.fill(kClosers[rng.below(3)]));
    }
    rec.body = join_sentences(sents, exclaim, rng);
    return rec;
}

} // namespace

std::vector<EmailRecord> generate_synthetic_corpus(const GenConfig& cfg) {
    if (cfg.n_per_cell < 1)
        throw ParameterError("generate_synthetic_corpus: n_per_cell must be >= 1");
    if (!cfg.human_register && !cfg.llm_register)
        throw ParameterError("generate_synthetic_corpus: no register enabled");

    Rng rng(numerics::derive_seed(cfg.seed, 0x67656e63ULL));
    SlotContext sc{rng, cfg.vocab_size};

    std::vector<std::pair<Label, Source>> cells;
    if (cfg.human_register) {
        cells.emplace_back(Label::Legitimate, Source::Human);
        cells.emplace_back(Label::Phishing, Source::Human);
    }
    if (cfg.llm_register) {
        cells.emplace_back(Label::Legitimate, Source::Llm);
        cells.emplace_back(Label::Phishing, Source::Llm);
    }

    std::vector<EmailRecord> out;
    out.reserve(cells.size() * cfg.n_per_cell);
    for (std::size_t i = 0; i < cfg.n_per_cell; ++i)
        for (const auto& [label, source] : cells)
            out.push_back(make_record(label, source, i, sc));
    return out;
}

} // namespace phishkit::corpus
