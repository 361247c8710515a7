#include "guiagent/prompter.hpp"

#include <algorithm>
#include <stdexcept>

namespace guiagent {

namespace {

constexpr std::string_view kPreamble = "Tasks can be completed by applying appropriate actions in sequence.";

std::string action_types_section()
{
    std::string out(section::kActionTypes);
    out += "\nThe following functions can be used as actions:\n";
    for (const auto name : all_actions()) {
        const auto& spec = action_spec(name);
        out += "- functions." + std::string(to_string(name)) + "(";
        for (std::size_t i = 0; i < spec.params.size(); ++i) {
            if (i)
                out += ", ";
            out += std::string(spec.params[i].name) + ": " +
                   (spec.params[i].type == ParamType::integer ? "integer" : "string");
        }
        out += "): " + std::string(spec.description) + "\n";
    }
    out += "Parameters:\n";
    for (const auto* param : {"element_id", "x", "y", "string_to_type"}) {
        for (const auto name : all_actions()) {
            bool found = false;
            for (const auto& p : action_spec(name).params) {
                if (p.name == param) {
                    out += "- " + std::string(p.name) + ": " + std::string(p.description) + "\n";
                    found = true;
                    break;
                }
            }
            if (found)
                break;
        }
    }
    return out;
}

std::string format_lines(int next)
{
    const auto n = std::to_string(next);
    return "Action_" + n + "=(Action: functions.some_function_name, Argument: {property_name: property_val})";
}

std::string instructions(int next, bool include_cot)
{
    const auto prev = std::to_string(next - 1);
    const auto n = std::to_string(next);
    std::string out(section::kInstructions);
    out += "\n";
    out += "What should be the next actions(action_" + n + ", action_" + std::to_string(next + 1) +
           ", ...) that can be performed on the current screen?\n";
    out += "If there is an action that can complete the task, perform it immediately. It's better if you can "
           "complete the task with fewer actions.\n";
    if (include_cot) {
        out += "Your answer must be composed of the following five sections:\n";
        out += "First, explain in detail what has been done so far up to action_" + prev +
               " and analyze why these steps were needed.\n";
        out += "Do not assume that the user could have made a mistake.\n\n";
        out += "Secondly, describe every single screen component that contains information that helps user solve "
               "the task or that needs to be interacted with. Explain about the components step by step in a "
               "detailed manner considering the given task.\n";
        out += "When the task deals with a list of items (e.g. finding the size of a group, identifying N-th item in "
               "order, etc.), you must include the full iteration of each and every items, like this: "
               "(1)first_item, (2)second_item, ..., (N)N-th_item.\n\n";
        out += "Thirdly, describe what needs to be done to complete the task, detailing each action from start to "
               "finish. Then, identify which steps can currently be performed based on the UI elements visible on "
               "the screen, and mention the ID of these elements.\n";
        out += "If there is a demo available, first describe the sequence of actions demonstrated, then link these "
               "actions to the steps in your plan before outlining the complete action plan.\n\n";
        out += "Lastly, each action must be in the form of " + format_lines(next) + ".\n";
    } else {
        out += "Each action must be in the form of " + format_lines(next) + ".\n";
    }
    out += "Return the actions that need to be performed on the current screen.\n";
    out += "The actions must be separated by new line characters.\n";
    out += "In case there are three actions to be performed, your response will be in the following form:\n\n";
    for (int i = 0; i < 3; ++i)
        out += format_lines(next + i) + "\n";
    return out;
}

std::string element_lines(const Observation& obs, RenderStyle style)
{
    if (obs.empty())
        return std::string(kEmptyScreen) + "\n";
    std::string out;
    for (const auto& [id, el] : obs.elements())
        out += render_element(id, el, style) + "\n";
    return out;
}

} // namespace

GuidelineSet GuidelineSet::defaults()
{
    return {{
        "- MAKE SURE that when you recommend actions that need to interact with UI elements, the UI elements MUST BE "
        "in the current screen.",
        "- MAKE SURE that when satisfying the task completion conditions, click the 'Submit' button to finish.",
        "- MAKE SURE that even if you do not find a suitable action, return the most plausible one.",
        "- MAKE SURE that since texts in elements are extracted by recognizing with OCR, solve the given task "
        "considering that some mis-typos could exist.",
    }};
}

PromptBundle build_caap_prompt(std::string_view task, const std::vector<Demonstration>& demos,
                               const std::vector<ActionRecord>& history, const Observation& obs,
                               const GuidelineSet& guidelines, const PromptOptions& options)
{
    if (history.empty() || history.front().name != "start")
        throw std::invalid_argument("action history must begin with the start record");

    const bool with_demos = options.include_demos && !demos.empty();
    const int next = history.back().index + 1;

    std::string out(kPreamble);
    out += "\n\n";
    if (with_demos) {
        out += std::string(section::kDemonstrations) + "\n";
        out += "For example, given below are the demos showing the correct sequence of actions for each "
               "corresponding task:\n";
        for (std::size_t i = 0; i < demos.size(); ++i)
            out += render_demo(demos[i], static_cast<int>(i) + 1, options.demo_reasons);
        out += "\n";
        out += "We are solving a similar task.\n";
    }
    out += "You are given the history of actions made correctly by the user so far, and current screen status which "
           "is the result of those actions.\n\n";
    out += std::string(section::kTask) + "\n";
    out += std::string(task) + "\n\n";
    out += std::string(section::kHistory) + "\n";
    out += render_history(history, true);
    out += "\n";
    out += std::string(section::kScreen) + "\n";
    out += render_observation(obs, RenderStyle::current_screen);
    out += "\n";
    if (!options.use_tools)
        out += action_types_section() + "\n";
    out += instructions(next, options.include_cot);
    if (!guidelines.lines.empty()) {
        out += "\n";
        for (const auto& g : guidelines.lines)
            out += g + "\n";
    }

    PromptBundle bundle;
    bundle.user_text = std::move(out);
    if (options.use_tools) {
        std::set<ActionName> all(all_actions().begin(), all_actions().end());
        bundle.tool_schemas = function_schemas(all);
    }
    return bundle;
}

std::string build_rationale_prompt(std::string_view task, const std::vector<ActionRecord>& history, int k,
                                   const Observation& before, const Observation& after)
{
    if (k < 2)
        throw std::invalid_argument("rationales are generated for real actions only (k >= 2), got k=" +
                                    std::to_string(k));
    if (static_cast<std::size_t>(k) > history.size())
        throw std::out_of_range("action index " + std::to_string(k) + " exceeds history length " +
                                std::to_string(history.size()));
    const auto ak = "action_" + std::to_string(k);

    std::string out(kPreamble);
    out += "\n\n";
    out += "Below is a record of a successful completion of the given task, demonstrated by an expert.\n";
    out += "(Note: The trainee has added the \"reason\" part for each action in the record, but it may not "
           "accurately describe the reasoning used by the expert who performed the task. Do not assume that the "
           "written reason is correct.)\n\n";
    out += "TASK:\n";
    out += std::string(task) + "\n\n";
    out += "Action History:\n";
    for (const auto& r : history)
        out += render_record(r, r.index < k, "action_") + "\n";
    out += "\n";
    out += "We want to explain to a trainee why the " + ak + " was made.\n\n";
    out += "Before the " + ak + ", the status of the computer screen was as the following:\n";
    out += render_observation(before, RenderStyle::demo_state);
    out += "\n";
    out += "After the " + ak + ", the status of the computer screen was as the following:\n";
    out += element_lines(after, RenderStyle::demo_state);
    out += "\n";
    out += "First, explain how the " + ak +
           " (both its type and its arguments) was chosen by the expert, and why it was necessary.\n";
    out += "Since the trainee cannot view the screen, always provide a detailed description as specified whenever "
           "you refer to a screen component in your response.\n";
    out += "Second, describe what happened after the action, as shown on the screen.\n\n";
    out += "Answer in one paragraph.\n";
    return out;
}

std::vector<Demonstration> select_demos(const std::string& family, const DemoStore& store, int max_k)
{
    if (max_k < 0)
        throw std::invalid_argument("max_k must be non-negative");
    const auto* demos = store.find(family);
    if (!demos)
        return {};
    const auto n = std::min<std::size_t>(demos->size(), static_cast<std::size_t>(max_k));
    return {demos->begin(), demos->begin() + static_cast<std::ptrdiff_t>(n)};
}

} // namespace guiagent
