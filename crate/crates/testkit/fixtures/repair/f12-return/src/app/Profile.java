package app;

public class Profile {
    public static String display(String name) {
        if (name.length() == 0) {
            return "anonymous";
        }
        return Secrets.token();
    }
}
