package tests;

public class ProfileTest {
    public static boolean empty() {
        return app.Profile.display("").equals("anonymous");
    }

    public static boolean shown() {
        return app.Profile.display("ann").equals("ann");
    }
}
